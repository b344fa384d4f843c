//! The recolor / uncolor / completion pipeline for planted 3-colorable
//! graphs, its unified recolor-uncolor step, and a cross-check of that
//! step against the message passing decoder in [`crate::mp_color`].

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{param, Error, Result};
use crate::graph::{is_proper, permuted_distance, Color, Coloring, Graph, PlantedInstance};
use crate::mp_color::{self, build_factor_graph, MessageState};
use crate::spectral::spectral_coloring;
use crate::structure::induced_components;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AkConfig {
    pub k: usize,
    /// Expected degree, used for the uncolor threshold.
    pub d: f64,
    pub tau: usize,
    pub recolor_iters: usize,
    pub uncolor_threshold: f64,
    /// Largest non-tree component handed to exhaustive search.
    pub component_cap: usize,
    pub spectral_restarts: usize,
    /// Replace the recolor rounds and the uncolor fixpoint by
    /// `recolor_iters` applications of [`unified_step`] at `tau`.
    pub unified: bool,
    pub seed: u64,
}

impl AkConfig {
    /// Defaults for an `n`-vertex instance with expected degree `d`:
    /// `⌈log₂ n⌉` recolor rounds, uncolor threshold `d/10`, exhaustive
    /// search on non-tree components up to `2⌈log₂ n⌉` vertices.
    pub fn for_instance(n: usize, d: f64, seed: u64) -> Self {
        let log = crate::ceil_log2(n).max(1);
        AkConfig {
            k: 3,
            d,
            tau: 1,
            recolor_iters: log,
            uncolor_threshold: d / 10.0,
            component_cap: 2 * log,
            spectral_restarts: 5,
            unified: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 {
            return param("tau must be at least 1");
        }
        if self.d.is_nan()
            || self.d <= 0.0
            || self.uncolor_threshold.is_nan()
            || self.uncolor_threshold <= 0.0
        {
            return param("degree and uncolor threshold must be positive");
        }
        if self.k != 3 {
            return param(format!(
                "the full pipeline is implemented for k = 3 (got {})",
                self.k
            ));
        }
        Ok(())
    }
}

fn neighbor_tally(g: &Graph, phi: &Coloring, v: usize) -> Vec<usize> {
    let mut t = vec![0; phi.k()];
    for &w in g.neighbors(v) {
        if let Some(c) = phi.get(w) {
            t[c as usize] += 1;
        }
    }
    t
}

/// Every vertex simultaneously takes the least popular color among its
/// neighbors, lowest index on ties.
pub fn ak_recolor_step(g: &Graph, phi: &Coloring) -> Result<Coloring> {
    if !phi.is_complete() {
        return param("recoloring needs a fully assigned coloring");
    }
    let colors: Vec<Color> = (0..g.n())
        .map(|v| {
            let t = neighbor_tally(g, phi, v);
            (0..t.len()).min_by_key(|&c| (t[c], c)).unwrap() as Color
        })
        .collect();
    Coloring::from_colors(phi.k(), &colors)
}

/// Repeatedly uncolors any vertex that, for some color other than its own,
/// has fewer than `threshold` neighbors currently holding that color.
pub fn ak_uncolor_fixpoint(g: &Graph, phi: &Coloring, threshold: f64) -> Result<Coloring> {
    let order: Vec<usize> = (0..g.n()).collect();
    ak_uncolor_fixpoint_in_order(g, phi, threshold, &order)
}

/// As [`ak_uncolor_fixpoint`], queueing the initial violators in `order`.
/// Uncoloring only lowers neighbor counts, so the fixpoint is the same for
/// every order.
pub fn ak_uncolor_fixpoint_in_order(
    g: &Graph,
    phi: &Coloring,
    threshold: f64,
    order: &[usize],
) -> Result<Coloring> {
    if !phi.is_complete() {
        return param("uncoloring starts from a fully assigned coloring");
    }
    let k = phi.k();
    let mut out = phi.clone();
    let mut counts: Vec<Vec<usize>> = (0..g.n()).map(|v| neighbor_tally(g, phi, v)).collect();
    let violates = |v: usize, own: Color, counts: &[Vec<usize>]| {
        (0..k).any(|c| c != own as usize && (counts[v][c] as f64) < threshold)
    };
    let mut queued = vec![false; g.n()];
    let mut stack = Vec::new();
    for &v in order {
        if !queued[v] && violates(v, phi.get(v).unwrap(), &counts) {
            queued[v] = true;
            stack.push(v);
        }
    }
    while let Some(v) = stack.pop() {
        let cv = out.get(v).expect("queued vertices are still colored");
        out.set(v, None);
        for &w in g.neighbors(v) {
            counts[w][cv as usize] -= 1;
            if let Some(cw) = out.get(w) {
                if !queued[w] && violates(w, cw, &counts) {
                    queued[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    Ok(out)
}

/// Simultaneous unified recolor-uncolor step: each vertex takes the least
/// popular assigned color among its neighbors, or becomes unassigned when
/// two or more colors have fewer than `tau` such neighbors. Unassigned
/// neighbors are not counted.
pub fn unified_step(g: &Graph, phi: &Coloring, tau: usize) -> Coloring {
    let colors = (0..g.n())
        .map(|v| mp_color::decide(&neighbor_tally(g, phi, v), tau))
        .collect();
    Coloring::new(phi.k(), colors).expect("colors come from 0..k")
}

/// Iterate-by-iterate comparison of [`unified_step`] and Gallager decoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub iterations: usize,
    /// First iteration (1-based) at which the two partial colorings differ.
    pub first_divergence: Option<usize>,
    /// Vertices that differ at the first divergence.
    pub differing_vertices: usize,
}

impl EquivalenceReport {
    pub fn identical(&self) -> bool {
        self.first_divergence.is_none()
    }
}

/// Runs `iters` unified steps from `phi0` and, separately, `iters`
/// Gallager sweeps from `phi0`, decoding all vertices with `B_i` after
/// every sweep. True iff all per-iteration partial colorings coincide.
pub fn gallager_equivalence_check(
    g: &Graph,
    phi0: &Coloring,
    tau: usize,
    iters: usize,
) -> Result<bool> {
    Ok(equivalence_report(g, phi0, tau, iters)?.identical())
}

pub fn equivalence_report(
    g: &Graph,
    phi0: &Coloring,
    tau: usize,
    iters: usize,
) -> Result<EquivalenceReport> {
    if !phi0.is_complete() {
        return param("the starting coloring must be fully assigned");
    }
    let fg = build_factor_graph(g);
    let mut state = MessageState::new(&fg, phi0, tau)?;
    let mut phi = phi0.clone();
    for t in 1..=iters {
        phi = unified_step(g, &phi, tau);
        state.sweep();
        let decoded = state.decode();
        if decoded != phi {
            let differing = (0..g.n()).filter(|&v| decoded.get(v) != phi.get(v)).count();
            return Ok(EquivalenceReport {
                iterations: iters,
                first_divergence: Some(t),
                differing_vertices: differing,
            });
        }
    }
    Ok(EquivalenceReport {
        iterations: iters,
        first_divergence: None,
        differing_vertices: 0,
    })
}

/// Per-iteration form of the cross-check: at every iteration `t`, one
/// Gallager sweep seeded with the partial coloring `φ_{t-1}` (variable
/// messages start at `φ_{t-1}`, constraint messages UNDECIDED) is decoded
/// with `B_i` and compared with `unified_step(φ_{t-1})`.
pub fn stepwise_equivalence_report(
    g: &Graph,
    phi0: &Coloring,
    tau: usize,
    iters: usize,
) -> Result<EquivalenceReport> {
    if !phi0.is_complete() {
        return param("the starting coloring must be fully assigned");
    }
    let fg = build_factor_graph(g);
    let mut phi = phi0.clone();
    for t in 1..=iters {
        let mut state = MessageState::new(&fg, &phi, tau)?;
        state.sweep();
        let decoded = state.decode();
        phi = unified_step(g, &phi, tau);
        if decoded != phi {
            let differing = (0..g.n()).filter(|&v| decoded.get(v) != phi.get(v)).count();
            return Ok(EquivalenceReport {
                iterations: iters,
                first_divergence: Some(t),
                differing_vertices: differing,
            });
        }
    }
    Ok(EquivalenceReport {
        iterations: iters,
        first_divergence: None,
        differing_vertices: 0,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum CompletionError {
    #[error("component {component} has {size} vertices, is not a tree and exceeds the search cap")]
    TooLarge { component: usize, size: usize },
    #[error("component {component} ({size} vertices) has no proper extension")]
    Unsatisfiable { component: usize, size: usize },
    #[error("the assigned part of the coloring is not proper")]
    ImproperInput,
    #[error("completion supports at most 64 colors")]
    TooManyColors,
}

/// Extends the proper partial coloring `phi` to all of `g` without touching
/// assigned vertices.
///
/// Components of the unassigned subgraph are handled in order of their
/// smallest vertex. Tree components are list-colored in linear time: a
/// leaf-to-root pass computes which colors each subtree can accept, then a
/// root-to-leaf pass picks the lowest feasible color. Any other component
/// with at most `cap` vertices is searched exhaustively, lowest color first.
/// Both use the same DFS preorder from the smallest vertex, so on trees
/// they return the same coloring.
pub fn complete_uncolored(
    g: &Graph,
    phi: &Coloring,
    cap: usize,
) -> std::result::Result<Coloring, CompletionError> {
    let k = phi.k();
    if k > 64 {
        return Err(CompletionError::TooManyColors);
    }
    if !is_proper(g, phi) {
        return Err(CompletionError::ImproperInput);
    }
    let all: u64 = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let unassigned: Vec<bool> = phi.as_slice().iter().map(Option::is_none).collect();
    let mut out = phi.clone();

    for (id, comp) in induced_components(g, &unassigned).into_iter().enumerate() {
        let lists: Vec<u64> = comp
            .vertices
            .iter()
            .map(|&v| {
                g.neighbors(v)
                    .iter()
                    .filter_map(|&w| phi.get(w))
                    .fold(all, |m, c| m & !(1u64 << c))
            })
            .collect();
        let local = LocalComponent::new(g, &comp.vertices, &unassigned);
        let colors = if comp.edges + 1 == comp.size {
            local.list_color_tree(&lists)
        } else if comp.size <= cap {
            local.exhaustive(&lists)
        } else {
            return Err(CompletionError::TooLarge {
                component: id,
                size: comp.size,
            });
        };
        let Some(colors) = colors else {
            return Err(CompletionError::Unsatisfiable {
                component: id,
                size: comp.size,
            });
        };
        for (i, &v) in comp.vertices.iter().enumerate() {
            out.set(v, Some(colors[i]));
        }
    }
    Ok(out)
}

/// A component re-indexed to `0..size`, with its DFS preorder.
struct LocalComponent {
    adj: Vec<Vec<usize>>,
    preorder: Vec<usize>,
    parent: Vec<Option<usize>>,
}

impl LocalComponent {
    fn new(g: &Graph, vertices: &[usize], mask: &[bool]) -> Self {
        let index = |v: usize| vertices.binary_search(&v).ok();
        let adj: Vec<Vec<usize>> = vertices
            .iter()
            .map(|&v| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&w| mask[w])
                    .filter_map(|&w| index(w))
                    .collect()
            })
            .collect();
        let size = vertices.len();
        let mut preorder = Vec::with_capacity(size);
        let mut parent = vec![None; size];
        let mut seen = vec![false; size];
        // (vertex, next neighbor position)
        let mut stack = vec![(0usize, 0usize)];
        seen[0] = true;
        preorder.push(0);
        while let Some(top) = stack.last_mut() {
            let (u, pos) = *top;
            if pos == adj[u].len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let w = adj[u][pos];
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(u);
                preorder.push(w);
                stack.push((w, 0));
            }
        }
        LocalComponent {
            adj,
            preorder,
            parent,
        }
    }

    fn list_color_tree(&self, lists: &[u64]) -> Option<Vec<Color>> {
        let size = self.adj.len();
        let mut feasible = lists.to_vec();
        for &u in self.preorder.iter().rev() {
            if let Some(p) = self.parent[u] {
                let child = feasible[u];
                // parent color c survives iff the child can avoid c
                let mut keep = 0u64;
                let mut rest = feasible[p];
                while rest != 0 {
                    let c = rest.trailing_zeros();
                    if child & !(1u64 << c) != 0 {
                        keep |= 1u64 << c;
                    }
                    rest &= rest - 1;
                }
                feasible[p] = keep;
            }
        }
        let mut colors = vec![0 as Color; size];
        for &u in &self.preorder {
            let allowed = match self.parent[u] {
                Some(p) => feasible[u] & !(1u64 << colors[p]),
                None => feasible[u],
            };
            if allowed == 0 {
                return None;
            }
            colors[u] = allowed.trailing_zeros() as Color;
        }
        Some(colors)
    }

    fn exhaustive(&self, lists: &[u64]) -> Option<Vec<Color>> {
        let size = self.adj.len();
        let mut colors: Vec<Option<Color>> = vec![None; size];
        if self.search(0, lists, &mut colors) {
            Some(colors.into_iter().map(Option::unwrap).collect())
        } else {
            None
        }
    }

    fn search(&self, depth: usize, lists: &[u64], colors: &mut [Option<Color>]) -> bool {
        if depth == self.preorder.len() {
            return true;
        }
        let u = self.preorder[depth];
        let mut allowed = lists[u];
        for &w in &self.adj[u] {
            if let Some(c) = colors[w] {
                allowed &= !(1u64 << c);
            }
        }
        while allowed != 0 {
            let c = allowed.trailing_zeros() as Color;
            colors[u] = Some(c);
            if self.search(depth + 1, lists, colors) {
                return true;
            }
            allowed &= allowed - 1;
        }
        colors[u] = None;
        false
    }
}

/// Per-stage diagnostics of [`alon_kahale_full`]. Distances are
/// [`permuted_distance`] to the planted coloring; unassigned vertices count
/// as mismatches.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AkReport {
    pub spectral_distance: usize,
    pub spectral_degenerate: bool,
    pub recolor_distance: usize,
    pub uncolor_distance: usize,
    pub uncolored: usize,
    pub final_distance: Option<usize>,
    pub proper: bool,
    pub spectral_ms: f64,
    pub recolor_ms: f64,
    pub uncolor_ms: f64,
    pub completion_ms: f64,
}

#[derive(Debug, Error)]
pub enum AkError {
    #[error(transparent)]
    Stage(#[from] Error),
    #[error("completion failed: {cause}")]
    Completion {
        cause: CompletionError,
        report: Box<AkReport>,
    },
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Spectral start, `recolor_iters` recolor rounds, uncolor fixpoint at
/// `uncolor_threshold`, then completion of the uncolored part. With
/// `cfg.unified` the middle two stages become unified steps.
pub fn alon_kahale_full(
    inst: &PlantedInstance,
    cfg: &AkConfig,
) -> std::result::Result<(Coloring, AkReport), AkError> {
    cfg.validate()?;
    let g = &inst.graph;
    let planted = &inst.planted;
    let mut report = AkReport::default();

    let t = Instant::now();
    let spectral = spectral_coloring(g, cfg.k, cfg.spectral_restarts, cfg.seed)?;
    report.spectral_ms = ms_since(t);
    report.spectral_degenerate = spectral.degenerate;
    report.spectral_distance = permuted_distance(&spectral.coloring, planted)?.0;

    let t = Instant::now();
    let mut phi = spectral.coloring;
    let partial = if cfg.unified {
        for _ in 0..cfg.recolor_iters {
            phi = unified_step(g, &phi, cfg.tau);
        }
        report.recolor_ms = ms_since(t);
        report.recolor_distance = permuted_distance(&phi, planted)?.0;
        phi
    } else {
        for _ in 0..cfg.recolor_iters {
            phi = ak_recolor_step(g, &phi)?;
        }
        report.recolor_ms = ms_since(t);
        report.recolor_distance = permuted_distance(&phi, planted)?.0;
        let t = Instant::now();
        let partial = ak_uncolor_fixpoint(g, &phi, cfg.uncolor_threshold)?;
        report.uncolor_ms = ms_since(t);
        partial
    };
    report.uncolored = partial.unassigned_count();
    report.uncolor_distance = permuted_distance(&partial, planted)?.0;

    let t = Instant::now();
    let done = complete_uncolored(g, &partial, cfg.component_cap);
    report.completion_ms = ms_since(t);
    match done {
        Ok(full) => {
            report.proper = is_proper(g, &full);
            report.final_distance = Some(permuted_distance(&full, planted)?.0);
            Ok((full, report))
        }
        Err(cause) => Err(AkError::Completion {
            cause,
            report: Box::new(report),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_planted;

    fn col(k: usize, c: &[Option<Color>]) -> Coloring {
        Coloring::new(k, c.to_vec()).unwrap()
    }

    #[test]
    fn recolor_examples() {
        let inst = generate_planted(6, 3, 1.0, 0).unwrap();
        assert_eq!(
            ak_recolor_step(&inst.graph, &inst.planted).unwrap(),
            inst.planted
        );

        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let out = ak_recolor_step(&edge, &col(3, &[Some(0), Some(0)])).unwrap();
        assert_eq!(out.as_slice(), &[Some(1), Some(1)]);

        let lone = Graph::empty(1);
        let out = ak_recolor_step(&lone, &col(3, &[Some(2)])).unwrap();
        assert_eq!(out.get(0), Some(0));
    }

    #[test]
    fn uncolor_examples() {
        let inst = generate_planted(6, 3, 1.0, 0).unwrap();
        assert_eq!(
            ak_uncolor_fixpoint(&inst.graph, &inst.planted, 1.0).unwrap(),
            inst.planted
        );

        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let out = ak_uncolor_fixpoint(&edge, &col(3, &[Some(0), Some(1)]), 1.0).unwrap();
        assert_eq!(out.unassigned_count(), 2);

        let empty = Graph::empty(4);
        let phi = Coloring::from_colors(3, &[0, 1, 2, 0]).unwrap();
        assert_eq!(
            ak_uncolor_fixpoint(&empty, &phi, 1.0)
                .unwrap()
                .unassigned_count(),
            4
        );
    }

    #[test]
    fn unified_step_examples() {
        // star center 0 with leaves colored 0, 1 (tallies (1,1,0)) -> 2
        let star = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let out = unified_step(&star, &col(3, &[Some(0), Some(0), Some(1)]), 1);
        assert_eq!(out.get(0), Some(2));
        // leaves see one assigned neighbor: two colors below tau
        assert_eq!(out.get(1), None);

        let inst = generate_planted(6, 3, 1.0, 0).unwrap();
        assert_eq!(unified_step(&inst.graph, &inst.planted, 1), inst.planted);
    }

    #[test]
    fn equivalence_trivial_cases() {
        let inst = generate_planted(6, 3, 1.0, 0).unwrap();
        assert!(gallager_equivalence_check(&inst.graph, &inst.planted, 1, 0).unwrap());
        assert!(gallager_equivalence_check(&inst.graph, &inst.planted, 1, 5).unwrap());
    }

    #[test]
    fn stepwise_equivalence_on_random_instances() {
        for seed in 0..20 {
            let inst = generate_planted(40, 3, 0.2, seed).unwrap();
            let phi0 = crate::graph::perturb(&inst.planted, 6, seed).unwrap();
            for tau in 1..=2 {
                let r = stepwise_equivalence_report(&inst.graph, &phi0, tau, 15).unwrap();
                assert!(r.identical(), "seed {seed} tau {tau}: {r:?}");
            }
        }
    }

    #[test]
    fn completion_star_center() {
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let phi = col(3, &[None, Some(0), Some(0), Some(0)]);
        let out = complete_uncolored(&star, &phi, 4).unwrap();
        assert_eq!(out.get(0), Some(1));
    }

    #[test]
    fn completion_free_triangle() {
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let out = complete_uncolored(&tri, &Coloring::unassigned(3, 3).unwrap(), 3).unwrap();
        assert!(out.is_complete() && is_proper(&tri, &out));
        assert_eq!(
            complete_uncolored(&tri, &Coloring::unassigned(3, 3).unwrap(), 2),
            Err(CompletionError::TooLarge {
                component: 0,
                size: 3
            })
        );
    }

    #[test]
    fn completion_failures() {
        // center adjacent to all three colors
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let phi = col(3, &[None, Some(0), Some(1), Some(2)]);
        assert_eq!(
            complete_uncolored(&star, &phi, 4),
            Err(CompletionError::Unsatisfiable {
                component: 0,
                size: 1
            })
        );
        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(
            complete_uncolored(&edge, &col(3, &[Some(1), Some(1)]), 4),
            Err(CompletionError::ImproperInput)
        );
        // K4 needs four colors
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(
            complete_uncolored(&k4, &Coloring::unassigned(4, 3).unwrap(), 10),
            Err(CompletionError::Unsatisfiable {
                component: 0,
                size: 4
            })
        );
    }

    #[test]
    fn pipeline_on_k222() {
        let inst = generate_planted(6, 3, 1.0, 0).unwrap();
        let cfg = AkConfig::for_instance(6, 4.0, 1);
        let (phi, report) = alon_kahale_full(&inst, &cfg).unwrap();
        assert!(is_proper(&inst.graph, &phi));
        assert_eq!(report.final_distance, Some(0));
        assert_eq!(report.spectral_distance, 0);
        assert_eq!(report.uncolored, 0);
    }

    #[test]
    fn pipeline_on_empty_graph() {
        let inst = generate_planted(9, 3, 0.0, 0).unwrap();
        let cfg = AkConfig::for_instance(9, 4.0, 1);
        let (phi, report) = alon_kahale_full(&inst, &cfg).unwrap();
        assert_eq!(report.uncolored, 9);
        assert!(phi.as_slice().iter().all(|&c| c == Some(0)));
    }
}
