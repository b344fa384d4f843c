//! Seeded experiment runner and machine-readable reports.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ak::{self, AkConfig, AkError};
use crate::error::{param, Error, Result};
use crate::graph::{
    coloring_distance, edge_probability_for_degree, generate_planted, is_proper, perturb, Coloring,
    PlantedInstance,
};
use crate::ldpc::{self, Word};
use crate::mp_color::{default_max_iters, run_gallager, RunStatus};
use crate::structure::{extract_core, noncore_components, verify_core};

/// Largest flip fraction covered by the convergence guarantee.
pub const PROVEN_EPSILON: f64 = 1.0 / 120.0;
pub const DEFAULT_DEGREE: f64 = 60.0;
pub const DEFAULT_LDPC_ITERS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ColorGallager,
    ColorAk,
    Equivalence,
    Ldpc,
    Structure,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ColorGallager => "color-gallager",
            Mode::ColorAk => "color-ak",
            Mode::Equivalence => "equivalence",
            Mode::Ldpc => "ldpc",
            Mode::Structure => "structure",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Mode::ColorGallager,
            Mode::ColorAk,
            Mode::Equivalence,
            Mode::Ldpc,
            Mode::Structure,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::Parameter(format!("unknown mode {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    JsonLines,
    Csv,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json-lines" | "jsonl" => Ok(Format::JsonLines),
            "csv" => Ok(Format::Csv),
            _ => param(format!("unknown format {s:?}")),
        }
    }
}

/// Whether wall-clock fields are written. Reports without them are
/// byte-identical across runs and thread counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Timing {
    #[default]
    Include,
    Exclude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    /// Expected vertex degree; the edge probability is derived from it.
    pub d: f64,
    /// Fraction of vertices (or bits) flipped before decoding.
    pub epsilon: f64,
    /// Defaults to 1 for coloring modes and `s - 1` for LDPC.
    pub tau: Option<usize>,
    pub seeds: Vec<u64>,
    /// Defaults to `10 ⌈log₂ n⌉` for coloring, 15 for equivalence and 50
    /// for LDPC.
    pub max_iters: Option<usize>,
    /// Variable and check degrees of LDPC codes.
    pub s: usize,
    pub t: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::ColorGallager,
            n: 3000,
            k: 3,
            d: DEFAULT_DEGREE,
            epsilon: PROVEN_EPSILON,
            tau: None,
            seeds: vec![0],
            max_iters: None,
            s: 3,
            t: 6,
            output: None,
            format: Format::JsonLines,
        }
    }
}

/// `count` consecutive seeds starting at `base`.
pub fn seed_range(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| base + i).collect()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return param(format!("epsilon = {} outside [0, 1]", self.epsilon));
        }
        if self.seeds.is_empty() {
            return param("at least one seed is required");
        }
        if self.tau == Some(0) {
            return param("tau must be at least 1");
        }
        match self.mode {
            Mode::Ldpc => {
                if self.s == 0 || self.t == 0 || !(self.n * self.s).is_multiple_of(self.t) {
                    return param(format!(
                        "no ({}, {})-regular code on {} variables",
                        self.s, self.t, self.n
                    ));
                }
            }
            _ => {
                if self.k < 2 || self.n < self.k {
                    return param(format!(
                        "need 2 <= k <= n, got k = {} and n = {}",
                        self.k, self.n
                    ));
                }
                if self.d.is_nan() || self.d <= 0.0 {
                    return param("expected degree must be positive");
                }
            }
        }
        Ok(())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.epsilon > PROVEN_EPSILON
            && matches!(self.mode, Mode::ColorGallager | Mode::Equivalence)
        {
            w.push(format!(
                "epsilon = {} exceeds 1/120; convergence is not guaranteed there",
                self.epsilon
            ));
        }
        w
    }

    pub fn tau(&self) -> usize {
        self.tau.unwrap_or(match self.mode {
            Mode::Ldpc => self.s.saturating_sub(1).max(1),
            _ => 1,
        })
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters.unwrap_or(match self.mode {
            Mode::Ldpc => DEFAULT_LDPC_ITERS,
            Mode::Equivalence => 15,
            _ => default_max_iters(self.n),
        })
    }

    pub fn flips(&self) -> usize {
        (self.epsilon * self.n as f64).floor() as usize
    }

    pub fn component_cap(&self) -> usize {
        2 * crate::ceil_log2(self.n).max(1)
    }

    pub fn instance(&self, seed: u64) -> Result<PlantedInstance> {
        let p = edge_probability_for_degree(self.n, self.k, self.d)?;
        generate_planted(self.n, self.k, p, seed)
    }
}

/// One seed's outcome. For LDPC runs the vertex counts refer to bits and
/// `proper_after_completion` means exact recovery of the codeword.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub mode: Mode,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    pub assigned_correct: usize,
    pub undecided: usize,
    pub assigned_wrong: usize,
    pub distance_start: usize,
    pub proper_after_completion: bool,
    pub core_size: Option<usize>,
    pub max_noncore_component: Option<usize>,
    pub noncore_cycles: Option<usize>,
    pub success: bool,
    pub error: Option<String>,
    pub wall_time_ms: Option<f64>,
    pub completion_ms: Option<f64>,
}

impl RunResult {
    fn blank(cfg: &ExperimentConfig, seed: u64) -> Self {
        RunResult {
            seed,
            mode: cfg.mode,
            n: cfg.n,
            converged: false,
            iterations: 0,
            assigned_correct: 0,
            undecided: 0,
            assigned_wrong: 0,
            distance_start: 0,
            proper_after_completion: false,
            core_size: None,
            max_noncore_component: None,
            noncore_cycles: None,
            success: false,
            error: None,
            wall_time_ms: None,
            completion_ms: None,
        }
    }

    pub fn undecided_fraction(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.undecided as f64 / self.n as f64
        }
    }

    fn count_against(&mut self, phi: &Coloring, truth: &Coloring) {
        self.undecided = phi.unassigned_count();
        self.assigned_correct = (0..phi.len())
            .filter(|&v| phi.get(v).is_some() && phi.get(v) == truth.get(v))
            .count();
        self.assigned_wrong = phi.len() - self.undecided - self.assigned_correct;
    }

    fn record_structure(&mut self, inst: &PlantedInstance, d: f64) {
        let core = extract_core(inst, d);
        let comps = noncore_components(&inst.graph, &core);
        self.core_size = Some(core.members.len());
        self.max_noncore_component = Some(comps.max_size);
        self.noncore_cycles = Some(comps.cycle_count);
    }
}

/// Runs one seed. Errors from the modules are recorded in the result.
pub fn run_single(cfg: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let start = Instant::now();
    let mut r = RunResult::blank(cfg, seed);
    if let Err(e) = fill(cfg, seed, &mut r) {
        r.error = Some(e.to_string());
        r.success = false;
    }
    r.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(r)
}

fn fill(cfg: &ExperimentConfig, seed: u64, r: &mut RunResult) -> Result<()> {
    match cfg.mode {
        Mode::ColorGallager => run_color_gallager(cfg, seed, r),
        Mode::ColorAk => run_color_ak(cfg, seed, r),
        Mode::Equivalence => run_equivalence(cfg, seed, r),
        Mode::Ldpc => run_ldpc(cfg, seed, r),
        Mode::Structure => run_structure(cfg, seed, r),
    }
}

fn run_color_gallager(cfg: &ExperimentConfig, seed: u64, r: &mut RunResult) -> Result<()> {
    let inst = cfg.instance(seed)?;
    let phi0 = perturb(&inst.planted, cfg.flips(), seed)?;
    r.distance_start = coloring_distance(&phi0, &inst.planted)?;
    r.record_structure(&inst, cfg.d);

    let out = run_gallager(&inst.graph, &phi0, cfg.tau(), cfg.max_iters(), None)?;
    r.converged = out.status == RunStatus::Converged;
    r.iterations = out.trace.changed_messages.len();
    r.count_against(&out.coloring, &inst.planted);

    let t = Instant::now();
    let done = ak::complete_uncolored(&inst.graph, &out.coloring, cfg.component_cap());
    r.completion_ms = Some(t.elapsed().as_secs_f64() * 1e3);
    match done {
        Ok(full) => r.proper_after_completion = is_proper(&inst.graph, &full),
        Err(e) => r.error = Some(format!("completion: {e}")),
    }
    r.success = r.converged && r.assigned_wrong == 0 && r.proper_after_completion;
    Ok(())
}

fn run_color_ak(cfg: &ExperimentConfig, seed: u64, r: &mut RunResult) -> Result<()> {
    let inst = cfg.instance(seed)?;
    r.record_structure(&inst, cfg.d);
    let mut ak_cfg = AkConfig::for_instance(cfg.n, cfg.d, seed);
    ak_cfg.k = cfg.k;
    ak_cfg.tau = cfg.tau();
    r.iterations = ak_cfg.recolor_iters;
    match ak::alon_kahale_full(&inst, &ak_cfg) {
        Ok((full, report)) => {
            r.converged = true;
            r.distance_start = report.spectral_distance;
            r.undecided = report.uncolored;
            r.assigned_wrong = report.uncolor_distance - report.uncolored;
            r.assigned_correct = cfg.n - r.undecided - r.assigned_wrong;
            r.completion_ms = Some(report.completion_ms);
            r.proper_after_completion = is_proper(&inst.graph, &full);
            r.success = r.proper_after_completion;
        }
        Err(AkError::Completion { cause, report }) => {
            r.distance_start = report.spectral_distance;
            r.undecided = report.uncolored;
            r.assigned_wrong = report.uncolor_distance - report.uncolored;
            r.assigned_correct = cfg.n - r.undecided - r.assigned_wrong;
            r.completion_ms = Some(report.completion_ms);
            r.error = Some(format!("completion: {cause}"));
        }
        Err(AkError::Stage(e)) => return Err(e),
    }
    Ok(())
}

fn run_equivalence(cfg: &ExperimentConfig, seed: u64, r: &mut RunResult) -> Result<()> {
    let inst = cfg.instance(seed)?;
    let phi0 = perturb(&inst.planted, cfg.flips(), seed)?;
    r.distance_start = coloring_distance(&phi0, &inst.planted)?;
    let iters = cfg.max_iters();
    let rep = ak::equivalence_report(&inst.graph, &phi0, cfg.tau(), iters)?;
    r.converged = rep.identical();
    r.iterations = rep.first_divergence.unwrap_or(iters);
    let mut phi = phi0;
    for _ in 0..iters {
        phi = ak::unified_step(&inst.graph, &phi, cfg.tau());
    }
    r.count_against(&phi, &inst.planted);
    if let Some(t) = rep.first_divergence {
        r.error = Some(format!(
            "decoders differ on {} vertices at iteration {t}",
            rep.differing_vertices
        ));
    }
    r.success = r.converged;
    Ok(())
}

fn run_ldpc(cfg: &ExperimentConfig, seed: u64, r: &mut RunResult) -> Result<()> {
    let code = ldpc::generate_regular_code(cfg.n, cfg.s, cfg.t, seed)?;
    let sent = Word::zeros(cfg.n);
    let received = ldpc::bsc_corrupt(&sent, cfg.flips(), seed)?;
    r.distance_start = received.weight();
    let out = ldpc::ldpc_decode(&code, &received, cfg.tau(), cfg.max_iters())?;
    r.converged = out.status == ldpc::DecodeStatus::Converged;
    r.iterations = out.iterations;
    r.assigned_wrong = out.word.weight();
    r.assigned_correct = cfg.n - r.assigned_wrong;
    r.proper_after_completion = r.assigned_wrong == 0;
    r.success = r.proper_after_completion;
    Ok(())
}

fn run_structure(cfg: &ExperimentConfig, seed: u64, r: &mut RunResult) -> Result<()> {
    let inst = cfg.instance(seed)?;
    let core = extract_core(&inst, cfg.d);
    let comps = noncore_components(&inst.graph, &core);
    r.core_size = Some(core.members.len());
    r.max_noncore_component = Some(comps.max_size);
    r.noncore_cycles = Some(comps.cycle_count);
    r.converged = true;
    r.success = verify_core(&inst, cfg.d, &core.members);
    if !r.success {
        r.error = Some("extracted set fails the core conditions".into());
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub success_fraction: f64,
    pub median_iterations: f64,
    pub mean_undecided_fraction: f64,
}

impl Aggregate {
    pub fn of(results: &[RunResult]) -> Self {
        let runs = results.len();
        if runs == 0 {
            return Aggregate {
                runs,
                success_fraction: 0.0,
                median_iterations: 0.0,
                mean_undecided_fraction: 0.0,
            };
        }
        let mut iters: Vec<usize> = results.iter().map(|r| r.iterations).collect();
        iters.sort_unstable();
        let median_iterations = if runs % 2 == 1 {
            iters[runs / 2] as f64
        } else {
            (iters[runs / 2 - 1] + iters[runs / 2]) as f64 / 2.0
        };
        Aggregate {
            runs,
            success_fraction: results.iter().filter(|r| r.success).count() as f64 / runs as f64,
            median_iterations,
            mean_undecided_fraction: results
                .iter()
                .map(RunResult::undecided_fraction)
                .sum::<f64>()
                / runs as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub results: Vec<RunResult>,
    pub aggregate: Aggregate,
}

impl SweepSummary {
    pub fn all_succeeded(&self) -> bool {
        self.results.iter().all(|r| r.success)
    }
}

/// Runs every seed in parallel; results keep the order of `cfg.seeds`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    let results = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_single(cfg, seed))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = Aggregate::of(&results);
    Ok(SweepSummary { results, aggregate })
}

pub fn emit_report(results: &[RunResult], format: Format, timing: Timing) -> Result<String> {
    if results.is_empty() {
        return param("nothing to report");
    }
    let stripped;
    let results = match timing {
        Timing::Include => results,
        Timing::Exclude => {
            stripped = results
                .iter()
                .cloned()
                .map(|mut r| {
                    r.wall_time_ms = None;
                    r.completion_ms = None;
                    r
                })
                .collect::<Vec<_>>();
            &stripped
        }
    };
    let report_err = |e: &dyn std::fmt::Display| Error::Report(e.to_string());
    match format {
        Format::JsonLines => {
            let mut out = String::new();
            for r in results {
                out.push_str(&serde_json::to_string(r).map_err(|e| report_err(&e))?);
                out.push('\n');
            }
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in results {
                w.serialize(r).map_err(|e| report_err(&e))?;
            }
            let bytes = w.into_inner().map_err(|e| report_err(&e))?;
            String::from_utf8(bytes).map_err(|e| report_err(&e))
        }
    }
}

pub fn parse_report(text: &str, format: Format) -> Result<Vec<RunResult>> {
    match format {
        Format::JsonLines => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })
            })
            .collect(),
        Format::Csv => csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .enumerate()
            .map(|(i, r)| {
                r.map_err(|e| Error::Parse {
                    line: i + 2,
                    msg: e.to_string(),
                })
            })
            .collect(),
    }
}

pub fn emit_aggregate(aggregate: &Aggregate) -> String {
    serde_json::to_string(aggregate).expect("aggregate is plain data") + "\n"
}
