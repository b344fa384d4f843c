//! Structural analysis of planted instances: the core, the non-core graph,
//! and small dense subgraphs.
//!
//! All degree thresholds are fractions of the degree parameter `d` and are
//! compared exactly (see [`Fraction`]).

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::graph::{Graph, PlantedInstance};
use crate::ratio::Fraction;

/// Degree fractions used by core extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreThresholds {
    /// Initial membership: at least `seed · d` neighbors in every other class.
    pub seed: Fraction,
    /// Retention: at least `inside · d` in-core neighbors in every other class.
    pub inside: Fraction,
    /// Retention: at most `outside · d` neighbors outside the set.
    pub outside: Fraction,
}

impl Default for CoreThresholds {
    fn default() -> Self {
        CoreThresholds {
            seed: Fraction::new(1, 4),
            inside: Fraction::new(1, 5),
            outside: Fraction::new(1, 20),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreSet {
    /// Sorted member list.
    pub members: Vec<usize>,
    pub d: f64,
    pub thresholds: CoreThresholds,
}

impl CoreSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.members {
            m[v] = true;
        }
        m
    }
}

/// Per-vertex neighbor counts by planted class, restricted to `inside`.
fn class_counts(inst: &PlantedInstance, v: usize, inside: Option<&[bool]>) -> Vec<usize> {
    let mut counts = vec![0; inst.k()];
    for &w in inst.graph.neighbors(v) {
        if inside.is_none_or(|m| m[w]) {
            counts[inst.class_of(w) as usize] += 1;
        }
    }
    counts
}

fn other_classes_reach(counts: &[usize], own: usize, f: Fraction, d: f64) -> bool {
    counts
        .iter()
        .enumerate()
        .all(|(c, &x)| c == own || f.reached_by(x, d))
}

/// Core with the default thresholds, deletions processed in vertex order.
pub fn extract_core(inst: &PlantedInstance, d: f64) -> CoreSet {
    extract_core_with(inst, d, CoreThresholds::default(), None)
}

/// Seeds `X` with the vertices having at least `seed · d` neighbors in each
/// other planted class, then deletes, until none is left, any member with
/// fewer than `inside · d` members in some other class or more than
/// `outside · d` neighbors outside `X`.
///
/// `order` fixes the order in which the initial violators are queued; the
/// result does not depend on it because deleting a vertex can only push its
/// neighbors further from the retention thresholds.
pub fn extract_core_with(
    inst: &PlantedInstance,
    d: f64,
    th: CoreThresholds,
    order: Option<&[usize]>,
) -> CoreSet {
    let g = &inst.graph;
    let n = g.n();
    let mut in_x: Vec<bool> = (0..n)
        .map(|v| {
            other_classes_reach(
                &class_counts(inst, v, None),
                inst.class_of(v) as usize,
                th.seed,
                d,
            )
        })
        .collect();

    let mut inside: Vec<Vec<usize>> = (0..n).map(|v| class_counts(inst, v, Some(&in_x))).collect();
    let mut outside: Vec<usize> = (0..n)
        .map(|v| g.neighbors(v).iter().filter(|&&w| !in_x[w]).count())
        .collect();
    let violates = |v: usize, inside: &[Vec<usize>], outside: &[usize]| {
        !other_classes_reach(&inside[v], inst.class_of(v) as usize, th.inside, d)
            || !th.outside.bounds(outside[v], d)
    };

    let natural: Vec<usize>;
    let order = match order {
        Some(o) => o,
        None => {
            natural = (0..n).collect();
            &natural
        }
    };
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    for &v in order {
        if in_x[v] && !queued[v] && violates(v, &inside, &outside) {
            queued[v] = true;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        in_x[v] = false;
        let cv = inst.class_of(v) as usize;
        for &w in g.neighbors(v) {
            inside[w][cv] -= 1;
            outside[w] += 1;
            if in_x[w] && !queued[w] && violates(w, &inside, &outside) {
                queued[w] = true;
                queue.push_back(w);
            }
        }
    }

    CoreSet {
        members: (0..n).filter(|&v| in_x[v]).collect(),
        d,
        thresholds: th,
    }
}

/// Both core conditions, with the default thresholds.
pub fn verify_core(inst: &PlantedInstance, d: f64, set: &[usize]) -> bool {
    verify_core_with(inst, d, CoreThresholds::default(), set)
}

pub fn verify_core_with(inst: &PlantedInstance, d: f64, th: CoreThresholds, set: &[usize]) -> bool {
    let n = inst.n();
    if set.iter().any(|&v| v >= n) {
        return false;
    }
    let mut mask = vec![false; n];
    for &v in set {
        mask[v] = true;
    }
    set.iter().all(|&v| {
        let counts = class_counts(inst, v, Some(&mask));
        let out = inst
            .graph
            .neighbors(v)
            .iter()
            .filter(|&&w| !mask[w])
            .count();
        other_classes_reach(&counts, inst.class_of(v) as usize, th.inside, d)
            && th.outside.bounds(out, d)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    /// Sorted vertex list.
    pub vertices: Vec<usize>,
    pub size: usize,
    pub edges: usize,
    pub has_cycle: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub components: Vec<Component>,
    pub max_size: usize,
    /// Sum over components of `edges - vertices + 1`, i.e. the number of
    /// independent cycles in the non-core graph.
    pub cycle_count: usize,
}

/// Connected components of the subgraph induced by the vertices with
/// `mask[v] == true`, ordered by smallest vertex.
pub fn induced_components(g: &Graph, mask: &[bool]) -> Vec<Component> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n {
        if !mask[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s);
        let mut vertices = Vec::new();
        let mut degree_sum = 0;
        while let Some(u) = stack.pop() {
            vertices.push(u);
            for &w in g.neighbors(u) {
                if mask[w] {
                    degree_sum += 1;
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        vertices.sort_unstable();
        let size = vertices.len();
        let edges = degree_sum / 2;
        out.push(Component {
            vertices,
            size,
            edges,
            has_cycle: edges >= size,
        });
    }
    out
}

pub fn noncore_components(g: &Graph, core: &CoreSet) -> ComponentReport {
    let outside: Vec<bool> = core.mask(g.n()).into_iter().map(|c| !c).collect();
    let components = induced_components(g, &outside);
    ComponentReport {
        max_size: components.iter().map(|c| c.size).max().unwrap_or(0),
        cycle_count: components.iter().map(|c| c.edges + 1 - c.size).sum(),
        components,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityMode {
    /// Exhaustive over all subsets; `n <= 24` and `max_size <= 12`.
    Exact,
    /// Min-degree peeling; the witness is a lower bound only.
    Peeling,
}

pub const EXACT_MAX_N: usize = 24;
pub const EXACT_MAX_SIZE: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseWitness {
    pub vertices: Vec<usize>,
    /// `2 e(U) / |U|`
    pub average_degree: f64,
    /// False for peeling output.
    pub exact: bool,
}

/// Densest subgraph on at most `max_size` vertices, by average degree.
pub fn densest_small_subgraph(
    g: &Graph,
    max_size: usize,
    mode: DensityMode,
) -> Result<DenseWitness> {
    match mode {
        DensityMode::Exact => densest_exact(g, max_size),
        DensityMode::Peeling => Ok(densest_peeling(g, max_size)),
    }
}

fn densest_exact(g: &Graph, max_size: usize) -> Result<DenseWitness> {
    let n = g.n();
    if n > EXACT_MAX_N || max_size > EXACT_MAX_SIZE {
        return param(format!(
            "exact densest subgraph needs n <= {EXACT_MAX_N} and max_size <= {EXACT_MAX_SIZE} (got {n}, {max_size})"
        ));
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | (1 << w)))
        .collect();
    // best as (2e, size) compared by cross-multiplication
    let mut best: Option<(usize, usize, u32)> = None;
    for size in 1..=max_size.min(n) {
        let mut set: u32 = (1u32 << size) - 1;
        let limit: u64 = 1u64 << n;
        while (set as u64) < limit {
            let mut twice_e = 0;
            let mut rest = set;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                twice_e += (adj[v] & set).count_ones() as usize;
                rest &= rest - 1;
            }
            if best.is_none_or(|(be, bs, _)| twice_e * bs > be * size) {
                best = Some((twice_e, size, set));
            }
            // Gosper's hack: next subset with the same popcount
            let c = set & set.wrapping_neg();
            let r = set as u64 + c as u64;
            if r >= limit {
                break;
            }
            let r = r as u32;
            set = (((r ^ set) >> 2) / c) | r;
        }
    }
    Ok(match best {
        None => DenseWitness {
            vertices: Vec::new(),
            average_degree: 0.0,
            exact: true,
        },
        Some((twice_e, size, set)) => DenseWitness {
            vertices: (0..n).filter(|&v| set & (1 << v) != 0).collect(),
            average_degree: twice_e as f64 / size as f64,
            exact: true,
        },
    })
}

fn densest_peeling(g: &Graph, max_size: usize) -> DenseWitness {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut heap: BTreeSet<(usize, usize)> = (0..n).map(|v| (degree[v], v)).collect();
    let mut edges = g.m();
    let mut removed = Vec::with_capacity(n);
    // best stage = number of removals done, scored by (2e, size)
    let mut best: Option<(usize, usize, usize)> = None;
    let mut remaining = n;
    loop {
        if remaining > 0
            && remaining <= max_size
            && best.is_none_or(|(be, bs, _)| 2 * edges * bs > be * remaining)
        {
            best = Some((2 * edges, remaining, removed.len()));
        }
        let Some(&(dv, v)) = heap.iter().next() else {
            break;
        };
        heap.remove(&(dv, v));
        alive[v] = false;
        removed.push(v);
        remaining -= 1;
        edges -= dv;
        for &w in g.neighbors(v) {
            if alive[w] {
                heap.remove(&(degree[w], w));
                degree[w] -= 1;
                heap.insert((degree[w], w));
            }
        }
    }
    match best {
        None => DenseWitness {
            vertices: Vec::new(),
            average_degree: 0.0,
            exact: false,
        },
        Some((twice_e, size, cut)) => {
            let mut keep = vec![true; n];
            for &v in &removed[..cut] {
                keep[v] = false;
            }
            DenseWitness {
                vertices: (0..n).filter(|&v| keep[v]).collect(),
                average_degree: twice_e as f64 / size as f64,
                exact: false,
            }
        }
    }
}
