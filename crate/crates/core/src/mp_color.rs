//! Gallager's hard-decision message passing on the factor graph of a
//! coloring instance.
//!
//! Variables are the vertices, constraints are the edges, and every
//! constraint touches exactly two variables. A constraint therefore just
//! repeats to one endpoint whatever the other endpoint told it, and a
//! variable tells each of its constraints the least popular color among the
//! messages arriving on its *other* constraints, or UNDECIDED when at least
//! two colors have fewer than `tau` votes.
//!
//! UNDECIDED messages never count toward any color's tally.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::graph::{Color, Coloring, Graph};

/// A message: a color, or `None` for UNDECIDED.
pub type Message = Option<Color>;

/// Bipartite variable/constraint incidence of a graph.
///
/// Factor edge `2j + s` joins constraint `j` to its endpoint
/// `endpoints[j][s]`; the other endpoint of that constraint sits behind
/// factor edge `(2j + s) ^ 1`.
#[derive(Clone, Debug)]
pub struct FactorGraph {
    n: usize,
    endpoints: Vec<[usize; 2]>,
    var_offsets: Vec<usize>,
    var_factor_edges: Vec<usize>,
}

impl FactorGraph {
    pub fn variable_count(&self) -> usize {
        self.n
    }

    pub fn constraint_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn factor_edge_count(&self) -> usize {
        2 * self.endpoints.len()
    }

    /// The two variables of constraint `j`, smaller first.
    pub fn constraint(&self, j: usize) -> [usize; 2] {
        self.endpoints[j]
    }

    /// Factor edges incident to variable `i`, ordered by constraint index.
    pub fn variable_edges(&self, i: usize) -> &[usize] {
        &self.var_factor_edges[self.var_offsets[i]..self.var_offsets[i + 1]]
    }

    /// Variable at the end of factor edge `e`.
    pub fn edge_variable(&self, e: usize) -> usize {
        self.endpoints[e / 2][e % 2]
    }

    /// Checks that every constraint has two distinct variables and that the
    /// per-variable lists mirror the constraint pairs.
    pub fn validate(&self) -> Result<()> {
        for (j, &[u, v]) in self.endpoints.iter().enumerate() {
            if u == v || u >= self.n || v >= self.n {
                return param(format!("constraint {j} has endpoints ({u}, {v})"));
            }
        }
        let mut seen = vec![false; self.factor_edge_count()];
        for i in 0..self.n {
            for &e in self.variable_edges(i) {
                if self.edge_variable(e) != i || seen[e] {
                    return param(format!(
                        "factor edge {e} listed inconsistently at variable {i}"
                    ));
                }
                seen[e] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return param("factor edge missing from the variable lists");
        }
        Ok(())
    }
}

pub fn build_factor_graph(g: &Graph) -> FactorGraph {
    let endpoints: Vec<[usize; 2]> = g.edges().map(|(u, v)| [u, v]).collect();
    let mut var_offsets = Vec::with_capacity(g.n() + 1);
    var_offsets.push(0);
    for v in 0..g.n() {
        var_offsets.push(var_offsets[v] + g.degree(v));
    }
    let mut fill = var_offsets[..g.n()].to_vec();
    let mut var_factor_edges = vec![0; 2 * endpoints.len()];
    for (j, &[u, v]) in endpoints.iter().enumerate() {
        var_factor_edges[fill[u]] = 2 * j;
        fill[u] += 1;
        var_factor_edges[fill[v]] = 2 * j + 1;
        fill[v] += 1;
    }
    FactorGraph {
        n: g.n(),
        endpoints,
        var_offsets,
        var_factor_edges,
    }
}

/// The decision rule shared by variable messages and the final `B_i`.
///
/// UNDECIDED when two or more colors have tally below `tau`; otherwise the
/// color with the smallest tally, lowest index on ties.
pub fn decide(tallies: &[usize], tau: usize) -> Message {
    let below = tallies.iter().filter(|&&t| t < tau).count();
    if below >= 2 {
        return None;
    }
    let mut best = 0;
    for (c, &t) in tallies.iter().enumerate() {
        if t < tallies[best] {
            best = c;
        }
    }
    Some(best as Color)
}

/// Variable-to-constraint message from the tallies of the *other*
/// constraints' messages. The received color does not appear here; it only
/// seeds the initial messages.
pub fn variable_message(tallies: &[usize], tau: usize) -> Message {
    decide(tallies, tau)
}

/// Constraint-to-variable message: the other endpoint's message, repeated.
pub fn constraint_message(other_endpoint: Message) -> Message {
    other_endpoint
}

/// Final per-vertex decision over all incoming constraint messages.
pub fn decode_b(tallies: &[usize], tau: usize) -> Message {
    decide(tallies, tau)
}

/// Per-color tally of the assigned entries of `messages`.
pub fn tally(messages: impl IntoIterator<Item = Message>, k: usize) -> Vec<usize> {
    let mut t = vec![0; k];
    for c in messages.into_iter().flatten() {
        t[c as usize] += 1;
    }
    t
}

/// Message buffers of one Gallager run.
///
/// `var_to_con[e]` is the message the variable of factor edge `e` sends to
/// its constraint, `con_to_var[e]` the message the constraint sends back.
/// A sweep fills the constraint buffer from the variable buffer, then a
/// scratch variable buffer from the constraint buffer, and swaps it in, so
/// every value of sweep `t` is a function of sweep `t - 1` only.
#[derive(Clone, Debug)]
pub struct MessageState<'g> {
    fg: &'g FactorGraph,
    k: usize,
    tau: usize,
    var_to_con: Vec<Message>,
    con_to_var: Vec<Message>,
    scratch: Vec<Message>,
    iteration: usize,
}

impl<'g> MessageState<'g> {
    /// Initializes every variable-to-constraint message to the variable's
    /// color in `phi0`. Constraint messages start UNDECIDED.
    pub fn new(fg: &'g FactorGraph, phi0: &Coloring, tau: usize) -> Result<Self> {
        if tau == 0 {
            return param("tau must be at least 1");
        }
        if phi0.len() != fg.variable_count() {
            return param(format!(
                "coloring has {} entries, graph has {} vertices",
                phi0.len(),
                fg.variable_count()
            ));
        }
        let var_to_con = (0..fg.factor_edge_count())
            .map(|e| phi0.get(fg.edge_variable(e)))
            .collect();
        Ok(MessageState {
            fg,
            k: phi0.k(),
            tau,
            var_to_con,
            con_to_var: vec![None; fg.factor_edge_count()],
            scratch: vec![None; fg.factor_edge_count()],
            iteration: 0,
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn var_to_con(&self) -> &[Message] {
        &self.var_to_con
    }

    pub fn con_to_var(&self) -> &[Message] {
        &self.con_to_var
    }

    /// One synchronous sweep. Returns how many variable-to-constraint
    /// messages changed.
    pub fn sweep(&mut self) -> usize {
        let fg = self.fg;
        for e in 0..self.con_to_var.len() {
            self.con_to_var[e] = constraint_message(self.var_to_con[e ^ 1]);
        }
        let mut counts = vec![0usize; self.k];
        for i in 0..fg.variable_count() {
            let edges = fg.variable_edges(i);
            counts.iter_mut().for_each(|c| *c = 0);
            for &e in edges {
                if let Some(c) = self.con_to_var[e] {
                    counts[c as usize] += 1;
                }
            }
            for &e in edges {
                let own = self.con_to_var[e];
                if let Some(c) = own {
                    counts[c as usize] -= 1;
                }
                self.scratch[e] = variable_message(&counts, self.tau);
                if let Some(c) = own {
                    counts[c as usize] += 1;
                }
            }
        }
        let changed = self
            .scratch
            .iter()
            .zip(&self.var_to_con)
            .filter(|(a, b)| a != b)
            .count();
        std::mem::swap(&mut self.var_to_con, &mut self.scratch);
        self.iteration += 1;
        changed
    }

    /// `B_i` for every vertex from the current constraint messages.
    pub fn decode(&self) -> Coloring {
        let colors = (0..self.fg.variable_count())
            .map(|i| {
                let t = tally(
                    self.fg
                        .variable_edges(i)
                        .iter()
                        .map(|&e| self.con_to_var[e]),
                    self.k,
                );
                decode_b(&t, self.tau)
            })
            .collect();
        Coloring::new(self.k, colors).expect("decoded colors are below k")
    }

    /// Number of `core` vertices with at least one outgoing message that
    /// differs from the planted color (UNDECIDED counts as different).
    pub fn wrong_core_count(&self, planted: &Coloring, core: &[usize]) -> usize {
        core.iter()
            .filter(|&&u| {
                let want = planted.get(u);
                self.fg
                    .variable_edges(u)
                    .iter()
                    .any(|&e| self.var_to_con[e] != want)
            })
            .count()
    }
}

/// Reference data for tracking convergence against a planted solution.
#[derive(Clone, Copy, Debug)]
pub struct Tracking<'a> {
    pub planted: &'a Coloring,
    /// Core vertices (see [`crate::structure::extract_core`]).
    pub core: &'a [usize],
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    /// `wrong_core_counts[i]` is the number of wrong core vertices after
    /// sweep `i`; index 0 is the initial state. Empty without tracking.
    pub wrong_core_counts: Vec<usize>,
    /// Variable-to-constraint messages changed in sweep `i + 1`.
    pub changed_messages: Vec<usize>,
    /// The sweep (1-based) that changed nothing, if any.
    pub converged_at: Option<usize>,
}

impl ConvergenceTrace {
    /// True when the wrong-core count never grows from sweep 1 on.
    pub fn wrong_core_non_increasing(&self) -> bool {
        self.wrong_core_counts
            .iter()
            .skip(1)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] <= w[0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunStatus {
    Converged,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct GallagerOutcome {
    pub coloring: Coloring,
    pub trace: ConvergenceTrace,
    pub status: RunStatus,
}

/// Default sweep budget, `10 · ⌈log₂ n⌉` (at least 10).
pub fn default_max_iters(n: usize) -> usize {
    10 * crate::ceil_log2(n).max(1)
}

/// Runs Gallager's algorithm from `phi0` and decodes every vertex with
/// `B_i`. Non-convergence is reported through the status, not as an error.
pub fn run_gallager(
    g: &Graph,
    phi0: &Coloring,
    tau: usize,
    max_iters: usize,
    tracking: Option<Tracking<'_>>,
) -> Result<GallagerOutcome> {
    if !phi0.is_complete() {
        return param("the starting coloring must be fully assigned");
    }
    let fg = build_factor_graph(g);
    let mut state = MessageState::new(&fg, phi0, tau)?;
    let mut trace = ConvergenceTrace::default();
    if let Some(t) = tracking {
        trace
            .wrong_core_counts
            .push(state.wrong_core_count(t.planted, t.core));
    }
    let mut status = RunStatus::MaxIters;
    for _ in 0..max_iters {
        let changed = state.sweep();
        trace.changed_messages.push(changed);
        if let Some(t) = tracking {
            trace
                .wrong_core_counts
                .push(state.wrong_core_count(t.planted, t.core));
        }
        if changed == 0 {
            trace.converged_at = Some(state.iteration());
            status = RunStatus::Converged;
            break;
        }
    }
    Ok(GallagerOutcome {
        coloring: state.decode(),
        trace,
        status,
    })
}
