//! Independent reference implementations shared by the integration suites.
#![allow(dead_code)]

use mpcolor::graph::{generate_planted, Color, Coloring, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0ac1e)
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; g.n()]; g.n()];
    for (u, v) in g.edges() {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    a
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (head, tail) = a.split_at_mut(q);
                for (apk, aqk) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (x, y) = (*apk, *aqk);
                    *apk = c * x - s * y;
                    *aqk = s * x + c * y;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    vals.sort_by(f64::total_cmp);
    vals
}

fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges).unwrap()
}

fn complete(n: usize) -> Graph {
    let e: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    graph(n, &e)
}

fn path(n: usize) -> Graph {
    let e: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    graph(n, &e)
}

fn cycle(n: usize) -> Graph {
    let mut e: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    e.push((0, n - 1));
    graph(n, &e)
}

fn star(leaves: usize) -> Graph {
    let e: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
    graph(leaves + 1, &e)
}

fn hypercube(dim: u32) -> Graph {
    let n = 1usize << dim;
    let e: Vec<_> = (0..n)
        .flat_map(|u| (0..dim).map(move |b| (u, u ^ (1 << b))))
        .filter(|(u, v)| u < v)
        .collect();
    graph(n, &e)
}

fn petersen() -> Graph {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((i, i + 5));
        e.push((i + 5, (i + 2) % 5 + 5));
    }
    let e: Vec<_> = e.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
    graph(10, &e)
}

fn random_gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng(seed);
    let e: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| r.gen::<f64>() < p)
        .collect();
    graph(n, &e)
}

/// Every small graph the eigensolver is checked on.
pub fn fixture_graphs() -> Vec<(String, Graph)> {
    let mut out = vec![
        ("empty-1".to_string(), Graph::empty(1)),
        ("empty-7".into(), Graph::empty(7)),
        ("K2".into(), complete(2)),
        ("K4".into(), complete(4)),
        ("K10".into(), complete(10)),
        ("P5".into(), path(5)),
        ("P10".into(), path(10)),
        ("P20".into(), path(20)),
        ("C5".into(), cycle(5)),
        ("C6".into(), cycle(6)),
        ("C20".into(), cycle(20)),
        ("star-7".into(), star(7)),
        ("star-19".into(), star(19)),
        ("petersen".into(), petersen()),
        ("Q4".into(), hypercube(4)),
        ("K222".into(), generate_planted(6, 3, 1.0, 0).unwrap().graph),
        ("K333".into(), generate_planted(9, 3, 1.0, 0).unwrap().graph),
        (
            "two-triangles".into(),
            graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]),
        ),
    ];
    for (i, &(n, p)) in [(12, 0.3), (15, 0.5), (18, 0.4), (20, 0.6), (20, 0.9)]
        .iter()
        .enumerate()
    {
        let inst = generate_planted(n, 3, p, 100 + i as u64).unwrap();
        out.push((format!("planted-{n}-{p}"), inst.graph));
    }
    for seed in 0..10 {
        let n = 8 + (seed as usize % 13);
        out.push((format!("gnp-{n}-{seed}"), random_gnp(n, 0.35, seed)));
    }
    out
}

pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    random_gnp(n, p, seed)
}

/// DFS preorder of the component of `mask` containing its smallest member,
/// neighbors visited in ascending order.
pub fn preorder(g: &Graph, mask: &[bool], root: usize) -> Vec<usize> {
    fn visit(g: &Graph, mask: &[bool], v: usize, seen: &mut [bool], out: &mut Vec<usize>) {
        seen[v] = true;
        out.push(v);
        for &w in g.neighbors(v) {
            if mask[w] && !seen[w] {
                visit(g, mask, w, seen, out);
            }
        }
    }
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    visit(g, mask, root, &mut seen, &mut out);
    out
}

/// First proper extension of `phi` to `order` in lexicographic order of the
/// colors along `order`, by enumerating all `k^|order|` assignments.
pub fn brute_force_first_extension(
    g: &Graph,
    phi: &Coloring,
    order: &[usize],
) -> Option<Vec<Color>> {
    let k = phi.k();
    let u = order.len();
    let total = k.pow(u as u32);
    for code in 0..total {
        let mut trial = phi.clone();
        let mut rest = code;
        for i in (0..u).rev() {
            trial.set(order[i], Some((rest % k) as Color));
            rest /= k;
        }
        let ok = order.iter().all(|&v| {
            g.neighbors(v)
                .iter()
                .all(|&w| trial.get(w).is_none() || trial.get(w) != trial.get(v))
        });
        if ok {
            return Some(order.iter().map(|&v| trial.get(v).unwrap()).collect());
        }
    }
    None
}

/// Densest subgraph with at most `max_size` vertices by enumerating every
/// vertex subset (n ≤ 20).
pub fn brute_force_densest(g: &Graph, max_size: usize) -> f64 {
    let n = g.n();
    assert!(n <= 20);
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | (1 << w)))
        .collect();
    let mut best = 0.0f64;
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size > max_size {
            continue;
        }
        let twice_edges: u32 = (0..n)
            .filter(|&v| mask >> v & 1 == 1)
            .map(|v| (adj[v] & mask).count_ones())
            .sum();
        best = best.max(twice_edges as f64 / size as f64);
    }
    best
}

/// Passed and attempted cases of one oracle suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tally {
    pub passed: usize,
    pub total: usize,
}

impl Tally {
    pub fn all(&self) -> bool {
        self.passed == self.total
    }

    fn record(&mut self, ok: bool) {
        self.total += 1;
        self.passed += ok as usize;
    }
}

/// Lanczos eigenvalues against dense Jacobi on every fixture graph, up to
/// six smallest eigenvalues, tolerance 1e-6.
pub fn eigen_suite() -> Tally {
    use mpcolor::spectral::{smallest_eigenpairs, DEFAULT_MAX_SWEEPS, DEFAULT_TOL};
    let mut t = Tally {
        passed: 0,
        total: 0,
    };
    for (name, g) in fixture_graphs() {
        let expected = jacobi_eigenvalues(dense_adjacency(&g));
        let m = g.n().min(6);
        let ok = match smallest_eigenpairs(&g, m, DEFAULT_TOL, DEFAULT_MAX_SWEEPS) {
            Ok(res) => {
                res.values
                    .iter()
                    .zip(&expected)
                    .all(|(a, b)| (a - b).abs() <= 1e-6)
                    && res.values.len() == m
            }
            Err(e) => {
                eprintln!("{name}: {e}");
                false
            }
        };
        if !ok {
            eprintln!("{name}: eigenvalues disagree with the dense oracle");
        }
        t.record(ok);
    }
    t
}

/// A random tree on `size` unassigned vertices with colored attachments,
/// relabeled by a random permutation.
pub fn tree_case(size: usize, attachments: usize, seed: u64) -> (Graph, Coloring) {
    let mut r = rng(seed);
    let n = size + attachments;
    let mut label: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        label.swap(i, r.gen_range(0..=i));
    }
    let mut edges = Vec::new();
    for v in 1..size {
        edges.push((r.gen_range(0..v), v));
    }
    let mut colors = vec![None; n];
    for a in size..n {
        edges.push((r.gen_range(0..size), a));
        colors[label[a]] = Some(r.gen_range(0..3u8));
    }
    let edges: Vec<_> = edges
        .into_iter()
        .map(|(u, v)| (label[u].min(label[v]), label[u].max(label[v])))
        .collect();
    (
        Graph::from_edges(n, &edges).unwrap(),
        Coloring::new(3, colors).unwrap(),
    )
}

/// Tree list-coloring against exhaustive enumeration on trees of up to ten
/// vertices: same existence verdict and the same coloring.
pub fn tree_completion_suite(cases: usize) -> Tally {
    use mpcolor::ak::{complete_uncolored, CompletionError};
    let mut t = Tally {
        passed: 0,
        total: 0,
    };
    for seed in 0..cases as u64 {
        let size = 1 + (seed as usize % 10);
        let attachments = (seed as usize * 7) % 12;
        let (g, phi) = tree_case(size, attachments, seed);
        let mask: Vec<bool> = phi.as_slice().iter().map(Option::is_none).collect();
        let root = mask.iter().position(|&b| b).unwrap();
        let order = preorder(&g, &mask, root);
        let expected = brute_force_first_extension(&g, &phi, &order);
        let got = complete_uncolored(&g, &phi, 0);
        let ok = match (expected, got) {
            (Some(colors), Ok(full)) => order
                .iter()
                .zip(&colors)
                .all(|(&v, &c)| full.get(v) == Some(c)),
            (None, Err(CompletionError::Unsatisfiable { .. })) => true,
            _ => false,
        };
        t.record(ok);
    }
    t
}

/// Peeling never beats the exact search, and the exact search matches an
/// independent subset enumeration.
pub fn densest_suite() -> Tally {
    use mpcolor::structure::{densest_small_subgraph, DensityMode, EXACT_MAX_SIZE};
    let mut t = Tally {
        passed: 0,
        total: 0,
    };
    for seed in 0..50u64 {
        let g = random_graph(20, 0.15 + 0.01 * (seed % 30) as f64, 1000 + seed);
        let exact = densest_small_subgraph(&g, EXACT_MAX_SIZE, DensityMode::Exact).unwrap();
        let peel = densest_small_subgraph(&g, EXACT_MAX_SIZE, DensityMode::Peeling).unwrap();
        let oracle = brute_force_densest(&g, EXACT_MAX_SIZE);
        t.record(
            peel.average_degree <= exact.average_degree + 1e-12
                && (exact.average_degree - oracle).abs() < 1e-12,
        );
    }
    t
}

/// Core extraction is a fixpoint of the retention rules and ignores the
/// processing order, on 100 small planted instances.
pub fn core_suite() -> Tally {
    use mpcolor::structure::{extract_core, extract_core_with, verify_core, CoreThresholds};
    let mut t = Tally {
        passed: 0,
        total: 0,
    };
    for seed in 0..100u64 {
        let n = 60 + 3 * (seed as usize % 40);
        let p = [0.3, 0.5, 0.7, 0.9][seed as usize % 4];
        let inst = generate_planted(n, 3, p, seed).unwrap();
        let d = p * 2.0 * n as f64 / 3.0;
        let core = extract_core(&inst, d);
        let mut r = rng(seed);
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, r.gen_range(0..=i));
        }
        let shuffled = extract_core_with(&inst, d, CoreThresholds::default(), Some(&order));
        let reversed: Vec<usize> = (0..n).rev().collect();
        let backwards = extract_core_with(&inst, d, CoreThresholds::default(), Some(&reversed));
        let again = extract_core(&inst, d);
        let sub = induced_instance(&inst, &core.members);
        let nested = extract_core(&sub, d);
        t.record(
            verify_core(&inst, d, &core.members)
                && nested.members.len() == core.members.len()
                && shuffled.members == core.members
                && backwards.members == core.members
                && again.members == core.members,
        );
    }
    t
}

/// The planted instance restricted to `members` (sorted), renumbered in order.
pub fn induced_instance(
    inst: &mpcolor::graph::PlantedInstance,
    members: &[usize],
) -> mpcolor::graph::PlantedInstance {
    let idx = |v: usize| members.binary_search(&v).ok();
    let edges: Vec<_> = inst
        .graph
        .edges()
        .filter_map(|(u, v)| Some((idx(u)?, idx(v)?)))
        .collect();
    let colors: Vec<Color> = members.iter().map(|&v| inst.class_of(v)).collect();
    let mut classes = vec![Vec::new(); inst.k()];
    for (i, &c) in colors.iter().enumerate() {
        classes[c as usize].push(i);
    }
    mpcolor::graph::PlantedInstance {
        graph: Graph::from_edges(members.len(), &edges).unwrap(),
        planted: Coloring::from_colors(inst.k(), &colors).unwrap(),
        classes,
        p: inst.p,
        seed: inst.seed,
    }
}
